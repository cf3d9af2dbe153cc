"""Stable-law quantile-ratio inversion grids.

Generated by scripts/gen_quantile_grids.py from scipy stable
quantiles (S0 parameterization); do not edit by hand.  See that
script for definitions and the closed-form anchors checked.
"""

import numpy as np

NU_A_NODES = np.array([
    np.float64(2.439), np.float64(2.5), np.float64(2.6), np.float64(2.7), np.float64(2.8), np.float64(3.0), np.float64(3.2), np.float64(3.5), np.float64(4.0), np.float64(5.0), np.float64(6.0), np.float64(8.0), np.float64(10.0), np.float64(15.0), np.float64(25.0),
])

NU_B_NODES = np.array([
    np.float64(0.0), np.float64(0.1), np.float64(0.2), np.float64(0.3), np.float64(0.5), np.float64(0.7), np.float64(1.0),
])

ALPHA_TABLE = np.array([
    [np.float64(1.999478444274728), np.float64(1.9994689348226984), np.float64(1.9994709635034102), np.float64(1.9994415252551898), np.float64(1.9994641473189285), np.float64(1.9994801372061195), np.float64(1.9994717517566771)],
    [np.float64(1.9155211744051575), np.float64(1.918168241802634), np.float64(1.9181682417757715), np.float64(1.9181682083811904), np.float64(1.918168241291413), np.float64(1.918168194338396), np.float64(1.918168241788427)],
    [np.float64(1.8090120228221938), np.float64(1.8128582816761676), np.float64(1.8164815109060028), np.float64(1.8164815485091526), np.float64(1.8164815491526893), np.float64(1.8164815476850382), np.float64(1.816481549156941)],
    [np.float64(1.7274127707494777), np.float64(1.7285634029763348), np.float64(1.7347122657134841), np.float64(1.7347252984773822), np.float64(1.734725317148931), np.float64(1.734725318005788), np.float64(1.734725317962549)],
    [np.float64(1.6617759170989126), np.float64(1.6612241841099584), np.float64(1.661527685599718), np.float64(1.6644839692349975), np.float64(1.6644839692371844), np.float64(1.6644839685378294), np.float64(1.664483969238092)],
    [np.float64(1.5600077966321413), np.float64(1.5576605382382764), np.float64(1.5517560300380897), np.float64(1.5462842472396663), np.float64(1.5463936408772894), np.float64(1.5463936413343418), np.float64(1.5463936412659403)],
    [np.float64(1.482042850208262), np.float64(1.4789815094582994), np.float64(1.4705116059210788), np.float64(1.4590751558317148), np.float64(1.4497181201098641), np.float64(1.4497181186410248), np.float64(1.4497181201098537)],
    [np.float64(1.3906654597223553), np.float64(1.3873250176027654), np.float64(1.37774160144014), np.float64(1.3632721570710833), np.float64(1.3344105252416694), np.float64(1.3336564528389003), np.float64(1.3336564512419784)],
    [np.float64(1.2773396262610568), np.float64(1.2741168871758168), np.float64(1.2647504817256854), np.float64(1.2500683708773859), np.float64(1.2110299123164814), np.float64(1.1925329064273806), np.float64(1.1925329064262626)],
    [np.float64(1.125651400342883), np.float64(1.122905789898396), np.float64(1.1148509082296456), np.float64(1.102009274458033), np.float64(1.0656932530688366), np.float64(1.0240627868846965), np.float64(1.0172993458356525)],
    [np.float64(1.0251876179490191), np.float64(1.0228581129798124), np.float64(1.0157966447778333), np.float64(1.0048120998587204), np.float64(0.9724489622082662), np.float64(0.9330520009963637), np.float64(0.9112768180135928)],
    [np.float64(0.8964299404585829), np.float64(0.8946765144751114), np.float64(0.8894165572167189), np.float64(0.8807694460442574), np.float64(0.8544085238928019), np.float64(0.8205179597924008), np.float64(0.7857769935428633)],
    [np.float64(0.8153256688817601), np.float64(0.8139156260462774), np.float64(0.8096581635967772), np.float64(0.8026208598505481), np.float64(0.7805009810399888), np.float64(0.7504785703744173), np.float64(0.7115225118924137)],
    [np.float64(0.6982197222470387), np.float64(0.6972387052143515), np.float64(0.694232235148614), np.float64(0.6892654907876552), np.float64(0.6733555616883158), np.float64(0.6497290084726074), np.float64(0.6088749324712568)],
    [np.float64(0.5894812931439675), np.float64(0.5887974875725474), np.float64(0.5867314775220782), np.float64(0.5832934402303882), np.float64(0.5723065617435027), np.float64(0.5553611484704216), np.float64(0.5164207250828368)],
])

BETA_TABLE = np.array([
    [np.float64(0.002696692961579525), np.float64(1.0), np.float64(1.0), np.float64(1.0), np.float64(1.0), np.float64(1.0), np.float64(1.0)],
    [np.float64(0.0002267242742450651), np.float64(1.0), np.float64(1.0), np.float64(1.0), np.float64(1.0), np.float64(1.0), np.float64(1.0)],
    [np.float64(0.00017604115008708918), np.float64(0.711528504368131), np.float64(1.0), np.float64(1.0), np.float64(1.0), np.float64(1.0), np.float64(1.0)],
    [np.float64(0.00012254788012858165), np.float64(0.4571685071223985), np.float64(0.9994787022120516), np.float64(1.0), np.float64(1.0), np.float64(1.0), np.float64(1.0)],
    [np.float64(9.689585819232971e-05), np.float64(0.34646767174767984), np.float64(0.7306717314233536), np.float64(1.0), np.float64(1.0), np.float64(1.0), np.float64(1.0)],
    [np.float64(6.647107283980654e-05), np.float64(0.24593458553172193), np.float64(0.5011768828548465), np.float64(0.7971152869490664), np.float64(1.0), np.float64(1.0), np.float64(1.0)],
    [np.float64(5.30721441454631e-05), np.float64(0.19975229583097784), np.float64(0.400990089529876), np.float64(0.6149916364033746), np.float64(1.0), np.float64(1.0), np.float64(1.0)],
    [np.float64(3.653525048077973e-05), np.float64(0.1639234931208787), np.float64(0.3263029050970291), np.float64(0.48925487253874467), np.float64(0.921317018710527), np.float64(1.0), np.float64(1.0)],
    [np.float64(2.4704149564105346e-05), np.float64(0.1345417227479077), np.float64(0.26723926052752495), np.float64(0.397476281276161), np.float64(0.6696978012481403), np.float64(1.0), np.float64(1.0)],
    [np.float64(1.8531276794058e-05), np.float64(0.10812621016435141), np.float64(0.21517205156664765), np.float64(0.32051193130863004), np.float64(0.5292357404414693), np.float64(0.7934626429639613), np.float64(1.0)],
    [np.float64(1.206549051803871e-05), np.float64(0.09488531954079749), np.float64(0.18936311571828557), np.float64(0.2825475465501166), np.float64(0.4684483039659328), np.float64(0.6742437581268415), np.float64(1.0)],
    [np.float64(1.0320449510442569e-05), np.float64(0.08070290861353477), np.float64(0.16131890949970412), np.float64(0.2418449711052601), np.float64(0.40441698569028256), np.float64(0.582705061813348), np.float64(1.0)],
    [np.float64(6.020482726755718e-06), np.float64(0.0728182956087546), np.float64(0.1457828907684381), np.float64(0.2190708960246528), np.float64(0.3686193094139651), np.float64(0.533831465464597), np.float64(1.0)],
    [np.float64(2.4796543971785162e-06), np.float64(0.06231861561849696), np.float64(0.1250142746468452), np.float64(0.18844402997045073), np.float64(0.32009364672905616), np.float64(0.4684539411186668), np.float64(1.0)],
    [np.float64(3.1042183520319996e-06), np.float64(0.05309219717581233), np.float64(0.106646935266923), np.float64(0.16116501955933776), np.float64(0.27605035652176074), np.float64(0.4091326698827977), np.float64(1.0)],
])

ALPHA_SL_NODES = np.array([
    np.float64(0.5), np.float64(0.55), np.float64(0.6), np.float64(0.65), np.float64(0.7), np.float64(0.75), np.float64(0.8), np.float64(0.85), np.float64(0.9), np.float64(0.95), np.float64(1.0), np.float64(1.05), np.float64(1.1), np.float64(1.15), np.float64(1.2), np.float64(1.25), np.float64(1.3), np.float64(1.35), np.float64(1.4), np.float64(1.45), np.float64(1.5), np.float64(1.55), np.float64(1.6), np.float64(1.65), np.float64(1.7), np.float64(1.75), np.float64(1.8), np.float64(1.85), np.float64(1.9), np.float64(1.95), np.float64(2.0),
])

BETA_SL_NODES = np.array([
    np.float64(0.0), np.float64(0.25), np.float64(0.5), np.float64(0.75), np.float64(1.0),
])

SCALE_TABLE = np.array([
    [np.float64(2.567665550378654), np.float64(3.051463813597593), np.float64(4.507601253272249), np.float64(6.600270471994981), np.float64(9.093519891773399)],
    [np.float64(2.4291338916308685), np.float64(2.802938315595766), np.float64(3.935666911247866), np.float64(5.535245131491079), np.float64(7.389210511705512)],
    [np.float64(2.324207927353401), np.float64(2.6219754572017533), np.float64(3.527839565056505), np.float64(4.789850537952547), np.float64(6.222852201849061)],
    [np.float64(2.2432997088489195), np.float64(2.4863876531382116), np.float64(3.225692340927029), np.float64(4.2450487860412185), np.float64(5.385607937648083)],
    [np.float64(2.18012844007126), np.float64(2.3825071077980824), np.float64(2.9949067253940473), np.float64(3.8329511478276226), np.float64(4.761421529301349)],
    [np.float64(2.1304010156201945), np.float64(2.301473254036886), np.float64(2.8142203891134363), np.float64(3.5124950929588317), np.float64(4.281627880768258)],
    [np.float64(2.091069470667134), np.float64(2.237292634960948), np.float64(2.669867949949668), np.float64(3.2576153640531262), np.float64(3.903464361684211)],
    [np.float64(2.0598924903299856), np.float64(2.1857739352259733), np.float64(2.552602687318551), np.float64(3.0510861050213123), np.float64(3.5991398651413635)],
    [np.float64(2.0351668151293003), np.float64(2.143916953023208), np.float64(2.4560147896558373), np.float64(2.8811282277569124), np.float64(3.349932402327829)],
    [np.float64(2.0155590527039986), np.float64(2.1095401922137302), np.float64(2.3755384243208892), np.float64(2.739448463763271), np.float64(3.1428373547133064)],
    [np.float64(2.0), np.float64(2.081036396989735), np.float64(2.307842612843195), np.float64(2.6200584045549933), np.float64(2.9685804468711767)],
    [np.float64(1.9876191597106156), np.float64(2.0572036787395396), np.float64(2.2504449227126853), np.float64(2.518537513981825), np.float64(2.8203951510012133)],
    [np.float64(1.977704663132508), np.float64(2.0371274103793007), np.float64(2.2014592480875788), np.float64(2.4315586568479133), np.float64(2.6932456504977758)],
    [np.float64(1.9696777910896708), np.float64(2.02009830516195), np.float64(2.159426910225134), np.float64(2.356574123207019), np.float64(2.5833187077302258)],
    [np.float64(1.9630744007926044), np.float64(2.005556248234074), np.float64(2.1232010615579213), np.float64(2.291602723028458), np.float64(2.487682888099358)],
    [np.float64(1.957528736638338), np.float64(1.993052077161769), np.float64(2.091866122181416), np.float64(2.2350822401152177), np.float64(2.4040548262002956)],
    [np.float64(1.952757880652764), np.float64(1.9822215558583456), np.float64(2.0646808186395624), np.float64(2.185765185082307), np.float64(2.3306356507157835)],
    [np.float64(1.9485468295748056), np.float64(1.9727673901900256), np.float64(2.0410374725726084), np.float64(2.142643882955714), np.float64(2.265994415766441)],
    [np.float64(1.9447348064196202), np.float64(1.964446387394478), np.float64(2.0204326646488715), np.float64(2.1048958603647385), np.float64(2.2089836599800323)],
    [np.float64(1.9412033430520244), np.float64(1.9570598405767652), np.float64(2.0024459385188313), np.float64(2.0718435677469897), np.float64(2.1586773273108633)],
    [np.float64(1.9378663634271658), np.float64(1.9504459555162996), np.float64(1.986724199903529), np.float64(2.0429244210642263), np.float64(2.1143245175314087)],
    [np.float64(1.9346622183348503), np.float64(1.9444736466085133), np.float64(1.9729701378501292), np.float64(2.017668404479548), np.float64(2.0753146246818894)],
    [np.float64(1.931547454446967), np.float64(1.9390373441358477), np.float64(1.960933478801517), np.float64(1.9956812985150163), np.float64(2.04115080099639)],
    [np.float64(1.928492033438312), np.float64(1.9340526262188455), np.float64(1.9504042465928304), np.float64(1.9766321479289233), np.float64(2.0114296118840493)],
    [np.float64(1.925475715048865), np.float64(1.9294525688834656), np.float64(1.9412074750466877), np.float64(1.9602439620286383), np.float64(1.9858253838943218)],
    [np.float64(1.9224853489328313), np.float64(1.9251847395873773), np.float64(1.9331990219005823), np.float64(1.9462869124350213), np.float64(1.9640781919727124)],
    [np.float64(1.9195128628046634), np.float64(1.9212087713039947), np.float64(1.9262622772598728), np.float64(1.9345735000002289), np.float64(1.9459847484974142)],
    [np.float64(1.916553777214928), np.float64(1.9174944611318239), np.float64(1.9203056609954268), np.float64(1.9249553281529628), np.float64(1.9313916866378205)],
    [np.float64(1.9136061150947894), np.float64(1.9140203463462129), np.float64(1.9152608762554353), np.float64(1.917321259225087), np.float64(1.9201909035700149)],
    [np.float64(1.910669605390999), np.float64(1.910772724585717), np.float64(1.9110819445759533), np.float64(1.9115968533264616), np.float64(1.912316766591117)],
    [np.float64(1.9077451048178746), np.float64(1.9077451048178746), np.float64(1.9077451048178746), np.float64(1.9077451048178746), np.float64(1.9077451048178746)],
])

LOCATION_TABLE = np.array([
    [np.float64(0.0), np.float64(0.06087670607934294), np.float64(0.27942921210306687), np.float64(0.6587156182765335), np.float64(1.1981093383177321)],
    [np.float64(0.0), np.float64(0.06999998853958024), np.float64(0.2760972982846911), np.float64(0.617203612583353), np.float64(1.087625230257313)],
    [np.float64(0.0), np.float64(0.0776266380918778), np.float64(0.2719811021747076), np.float64(0.5809966743454681), np.float64(0.9966381093222622)],
    [np.float64(0.0), np.float64(0.08387889119843307), np.float64(0.2672621041107514), np.float64(0.5488092103729231), np.float64(0.9197130484754709)],
    [np.float64(0.0), np.float64(0.08887289023763943), np.float64(0.26205970543029516), np.float64(0.5197430097986494), np.float64(0.8532687185164644)],
    [np.float64(0.0), np.float64(0.09271643013012819), np.float64(0.25645165129098674), np.float64(0.4931470894395827), np.float64(0.794847708140192)],
    [np.float64(0.0), np.float64(0.0955094673294139), np.float64(0.25048732334369816), np.float64(0.46853438106368234), np.float64(0.7427051167621326)],
    [np.float64(0.0), np.float64(0.09734529365494547), np.float64(0.24419667202494505), np.float64(0.44553003964110327), np.float64(0.6955649162604628)],
    [np.float64(0.0), np.float64(0.09831143484644703), np.float64(0.23759638372983724), np.float64(0.423838175578435), np.float64(0.652469525660758)],
    [np.float64(0.0), np.float64(0.09848999143414204), np.float64(0.2306942221283786), np.float64(0.4032197555107688), np.float64(0.6126835392116448)],
    [np.float64(0.0), np.float64(0.0979574976650517), np.float64(0.22349210573932446), np.float64(0.3834775086550556), np.float64(0.5756301439450777)],
    [np.float64(0.0), np.float64(0.09678452039598473), np.float64(0.21598826479607333), np.float64(0.3644453583787999), np.float64(0.5408479348800154)],
    [np.float64(0.0), np.float64(0.09503522210366548), np.float64(0.20817869515872583), np.float64(0.3459808500038653), np.float64(0.5079608296583363)],
    [np.float64(0.0), np.float64(0.09276704065586906), np.float64(0.20005805844231167), np.float64(0.32795960204599095), np.float64(0.47665660829139117)],
    [np.float64(0.0), np.float64(0.09003055215666085), np.float64(0.191620141952526), np.float64(0.31027114299676584), np.float64(0.4466712547096731)],
    [np.float64(0.0), np.float64(0.08686951608466312), np.float64(0.18285797329628437), np.float64(0.29281570289976167), np.float64(0.41777727079954124)],
    [np.float64(0.0), np.float64(0.08332106382594061), np.float64(0.17376367196491163), np.float64(0.27550166033109863), np.float64(0.3897747475648131)],
    [np.float64(0.0), np.float64(0.0794159778208867), np.float64(0.16432810772175077), np.float64(0.25824343062648836), np.float64(0.3624843656440527)],
    [np.float64(0.0), np.float64(0.07517900960221427), np.float64(0.15454042098229612), np.float64(0.24095963751597668), np.float64(0.3357417464010712)],
    [np.float64(0.0), np.float64(0.07062919280651297), np.float64(0.14438744374884385), np.float64(0.22357144777132854), np.float64(0.3093927365594433)],
    [np.float64(0.0), np.float64(0.06578011644418667), np.float64(0.13385304231281092), np.float64(0.20600097282473606), np.float64(0.2832893145449775)],
    [np.float64(0.0), np.float64(0.060640131500006494), np.float64(0.1229173860867158), np.float64(0.1881696558023167), np.float64(0.2572858738691423)],
    [np.float64(0.0), np.float64(0.05521246914426887), np.float64(0.11155613115732017), np.float64(0.16999656866755108), np.float64(0.23123567919536378)],
    [np.float64(0.0), np.float64(0.049495251141027416), np.float64(0.09973949224806476), np.float64(0.1513965427822756), np.float64(0.20498731065314477)],
    [np.float64(0.0), np.float64(0.04348137241948272), np.float64(0.0874311618096595), np.float64(0.13227804694988557), np.float64(0.17838091476398485)],
    [np.float64(0.0), np.float64(0.03715823216745966), np.float64(0.0745870183831545), np.float64(0.11254070888187029), np.float64(0.151244066804425)],
    [np.float64(0.0), np.float64(0.03050728291414178), np.float64(0.06115354607358493), np.float64(0.0920723469818001), np.float64(0.12338701808069885)],
    [np.float64(0.0), np.float64(0.023503356195037378), np.float64(0.047065860066691056), np.float64(0.07074533588614661), np.float64(0.09459704845509428)],
    [np.float64(0.0), np.float64(0.016113707248844887), np.float64(0.03224519562245822), np.float64(0.04841206569094133), np.float64(0.0646315623380294)],
    [np.float64(0.0), np.float64(0.008296697619129342), np.float64(0.016595664057242398), np.float64(0.02489916224167943), np.float64(0.033209443361726654)],
    [np.float64(0.0), np.float64(0.0), np.float64(0.0), np.float64(0.0), np.float64(0.0)],
])
